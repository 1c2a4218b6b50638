import os
from pathlib import Path
from typing import Optional, Union

import dotenv
from fastapi import FastAPI

from config import Settings, load_settings, setup_logging
from routers import health, models


def create_app(settings: Optional[Settings] = None, config_path: Optional[Union[str, Path]] = None) -> FastAPI:
    """Create and configure FastAPI application."""
    dotenv.load_dotenv()
    logger = setup_logging()

    if settings is None:
        settings = load_settings(config_path or os.getenv("MIPNET_CONFIG") or None)

    app = FastAPI(
        title="mipnet",
        description="Build, solve and evaluate MIP formulations of neural network training",
        version="1.0.0"
    )

    # Store dependencies in app state
    app.state.settings = settings
    app.state.logger = logger

    app.include_router(health.router)
    app.include_router(models.router)

    logger.info("mipnet service configured")
    return app


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(create_app(), host=os.getenv("MIPNET_HOST", "127.0.0.1"), port=int(os.getenv("MIPNET_PORT", "8000")))

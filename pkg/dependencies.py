from fastapi import HTTPException, Request

from config import Settings
from formulations.arch import HyperParams
from mip.branch_bound import MIPParams


def get_settings(request: Request) -> Settings:
    """Dependency to get the Settings loaded at startup."""
    settings = getattr(request.app.state, "settings", None)
    if settings is None:
        raise HTTPException(status_code=503, detail="Settings not configured.")
    return settings


def get_mip_params(request: Request) -> MIPParams:
    """Dependency to get the default solver parameters."""
    return get_settings(request).mip


def get_hyper_params(request: Request) -> HyperParams:
    """Dependency to get the default formulation constants."""
    return get_settings(request).hyper

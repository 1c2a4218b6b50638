"""Utility for loading and filling text report templates."""

from pathlib import Path
from typing import Any


def load_template(template_name: str, **kwargs: Any) -> str:
    """
    Load a template from the templates directory and format it with provided variables.

    Args:
        template_name: Name of the template file (without .md extension)
        **kwargs: Variables to substitute in the template

    Returns:
        Formatted text

    Raises:
        FileNotFoundError: If template file doesn't exist
        KeyError: If required template variables are missing
    """
    template_path = Path(__file__).parent.parent / "templates" / f"{template_name}.md"
    if not template_path.exists():
        raise FileNotFoundError(f"Template not found: {template_path}")

    template_content = template_path.read_text(encoding="utf-8")
    try:
        return template_content.format(**kwargs)
    except KeyError as e:
        raise KeyError(f"Missing required template variable: {e}")


def markdown_table(header: list, rows: list) -> str:
    """Pipe table with one line per row."""
    lines = ["| " + " | ".join(str(h) for h in header) + " |",
             "|" + "|".join("---" for _ in header) + "|"]
    lines.extend("| " + " | ".join(str(c) for c in row) + " |" for row in rows)
    return "\n".join(lines)

from contextlib import contextmanager

from fastapi import HTTPException

from app.exceptions import FennecError


@contextmanager
def physics_errors():
    """Translate toolkit errors into 400 responses"""
    try:
        yield
    except FennecError as e:
        raise HTTPException(status_code=400, detail={"error": type(e).__name__, "message": str(e)})

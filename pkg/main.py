"""
FastAPI application entry point for polyloc.

Configures middleware and includes the evaluation and scan routers.
"""

from typing import Dict, List

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from routers import evaluations, scans

app = FastAPI(
    title="polyloc",
    description="Nonlocality tests for quantum polygon networks.",
    version="1.0.0",
)

# CORS middleware: allow all origins for development
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(evaluations.router, prefix="/api")
app.include_router(scans.router, prefix="/api")


@app.get("/")
async def index() -> Dict[str, List[str]]:
    """List the available endpoints."""
    paths = sorted({route.path for route in app.routes if route.path.startswith("/api")})
    return {"endpoints": paths}

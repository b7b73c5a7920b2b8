from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from chiralwalk import __version__
from chiralwalk.api.v1 import endpoints
from chiralwalk.config import settings
from chiralwalk.utils.logger import logger

app = FastAPI(
    title="Chiral Walk Experiments",
    description="Continuous-time chiral quantum walk experiments over HTTP",
    version=__version__,
    docs_url="/docs",
    redoc_url="/redoc",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(endpoints.router, prefix="/api/v1")


@app.exception_handler(RequestValidationError)
async def validation_error_handler(request: Request, exc: RequestValidationError):
    """Rejected experiment configs are client errors like any other bad argument."""
    logger.warning(f"API: Invalid request to {request.url.path} - {exc.errors()}")
    return JSONResponse(status_code=400, content={"status": "error", "detail": str(exc.errors())})


@app.on_event("startup")
async def startup_event():
    logger.info("Chiral walk service starting up")
    logger.info(f"Output directory: {settings.OUTPUT_DIR}")
    logger.info(f"Debug mode: {settings.DEBUG}")


@app.get("/", tags=["Health"])
def root():
    """Root endpoint - API information"""
    return {
        "name": "Chiral Walk Experiments",
        "version": __version__,
        "status": "running",
        "docs": "/docs",
        "endpoints": {
            "experiments": "/api/v1/experiments",
            "run": "/api/v1/experiments/{name}",
        },
    }


@app.get("/health", tags=["Health"])
def health():
    """Liveness check with the configured worker count"""
    return {"status": "healthy", "workers": settings.WORKERS}


if __name__ == "__main__":
    import uvicorn

    logger.info(f"Starting server on {settings.API_HOST}:{settings.API_PORT}")
    uvicorn.run(
        "chiralwalk.main:app",
        host=settings.API_HOST,
        port=settings.API_PORT,
        reload=settings.DEBUG,
    )

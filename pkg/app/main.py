from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from app.core.config import settings
from app.core.logging import configure_logging
from app.api import graphs_router, spectrum_router, expansion_router, experiments_router

configure_logging(settings.log_level)

app = FastAPI(
    title="Percolation Lab API",
    description="Expander generation, edge percolation, degree peeling and expansion checks",
    version="1.0.0",
    docs_url="/docs",
    redoc_url="/redoc"
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.allowed_origins,
    allow_credentials=True,
    allow_methods=["GET", "POST", "OPTIONS"],
    allow_headers=["*"],
    expose_headers=["*"],
)

app.include_router(graphs_router)
app.include_router(spectrum_router)
app.include_router(expansion_router)
app.include_router(experiments_router)


@app.get("/")
async def root():
    return {"message": "Percolation Lab API", "version": "1.0.0"}


@app.get("/health")
async def health_check():
    return {"status": "healthy"}

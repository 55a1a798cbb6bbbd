from fastapi import FastAPI, UploadFile, File, HTTPException, Form
from fastapi.concurrency import run_in_threadpool
from fastapi.middleware.cors import CORSMiddleware
from contextlib import asynccontextmanager
from typing import Optional
import logging
import time
from core.experiment_config import parse_config_text
from core.experiment_runner import ExperimentRunner
from services.errors import ConfigError, SimulationError
import config

# Configure logging
logging.basicConfig(level=config.LOG_LEVEL, format=config.LOG_FORMAT)
logger = logging.getLogger(__name__)

@asynccontextmanager
async def lifespan(app: FastAPI):
    # Startup
    logger.info("Application starting up...")
    yield
    # Shutdown
    logger.info("Application shutting down...")

app = FastAPI(
    title=config.APP_TITLE,
    version=config.APP_VERSION,
    lifespan=lifespan
)

# Configure CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=config.CORS_ORIGINS,
    allow_credentials=config.CORS_CREDENTIALS,
    allow_methods=config.CORS_METHODS,
    allow_headers=config.CORS_HEADERS,
)

EXPECTED_MODE = {"g2tau": "cw", "pulsed": "pulsed", "sweep": "pulsed"}


async def run_experiment(kind: str, file: UploadFile, seed: Optional[int], workers: Optional[int]) -> dict:
    """
    Parse an uploaded YAML configuration and run one experiment in the thread pool

    Args:
        kind: g2tau, pulsed or sweep
        file: Uploaded configuration
        seed: Optional master seed override
        workers: Optional worker count override

    Returns:
        Run summary (status, files, metrics, wall time)
    """
    started = time.perf_counter()
    try:
        content = await file.read()
        if not content:
            raise HTTPException(status_code=400, detail="Empty configuration uploaded")

        experiment = parse_config_text(content, {"trajectory.seed": seed, "workers": workers})
        if experiment.mode != EXPECTED_MODE[kind]:
            raise ConfigError(f"{kind} needs a {EXPECTED_MODE[kind]} configuration", key="mode")
        if kind == "sweep" and experiment.sweep is None:
            raise ConfigError("sweep needs a sweep section", key="sweep")

        logger.info(f"Running {kind} for '{experiment.label}' from {file.filename}")
        runner = ExperimentRunner(experiment)
        run = {
            "g2tau": runner.run_cw_experiment,
            "pulsed": runner.run_pulsed_experiment,
            "sweep": runner.run_sweep,
        }[kind]
        result = await run_in_threadpool(run)
        logger.info(f"{kind} finished in {time.perf_counter() - started:.2f}s")
        return result.to_dict()

    except HTTPException:
        raise
    except ConfigError as e:
        logger.error(f"Invalid configuration {file.filename}: {str(e)}")
        raise HTTPException(status_code=400, detail={"error": str(e), "key": e.key})
    except SimulationError as e:
        logger.error(f"Simulation failed for {file.filename}: {str(e)}")
        raise HTTPException(status_code=422, detail=f"Simulation failed: {str(e)}")
    except Exception as e:
        logger.error(f"Error running {kind}: {str(e)}")
        raise HTTPException(
            status_code=500,
            detail=f"Error running {kind}: {str(e)}"
        )


@app.post("/api/g2tau")
async def g2tau(file: UploadFile = File(...), seed: int = Form(None), workers: int = Form(None)) -> dict:
    return await run_experiment("g2tau", file, seed, workers)

@app.post("/api/pulsed")
async def pulsed(file: UploadFile = File(...), seed: int = Form(None), workers: int = Form(None)) -> dict:
    return await run_experiment("pulsed", file, seed, workers)

@app.post("/api/sweep")
async def sweep(file: UploadFile = File(...), seed: int = Form(None), workers: int = Form(None)) -> dict:
    return await run_experiment("sweep", file, seed, workers)

@app.get("/")
async def read_root():
    return {"message": config.APP_TITLE}

@app.get("/test")
async def test_endpoint():
    return {"message": "API is working correctly", "status": "success"}

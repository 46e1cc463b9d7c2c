"""
Run output files
Versioned column schemas; every file lives in a run directory named after the config digest and seed
"""
import logging
from pathlib import Path

import pandas as pd

from config.run_config import RunConfig
from search.engine import RunResult, population_lines
from utils.data_reader import DataReader

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

STEPS_FILE = 'steps.csv'
ARMS_FILE = 'arms.csv'
SUMMARY_FILE = 'summary.json'
POPULATION_FILE = 'population.smi'
POLICY_FILE = 'policy.tsv'
CONFIG_FILE = 'config.yaml'

STEPS_COLUMNS = ['step', 'generated', 'passed_sw', 'novel', 'inserted']
ARMS_COLUMNS = ['step', 'parents', 'awake', 'sleeping', 'explored']
POLICY_COLUMNS = ['action', 'env_id', 'option', 'n_uses', 'n_success', 'rate', 'idx']


def run_dir_name(cfg: RunConfig) -> str:
    return f"{cfg.digest()}-seed{cfg.seed}"


def steps_frame(result: RunResult) -> pd.DataFrame:
    return pd.DataFrame([{c: getattr(r, c) for c in STEPS_COLUMNS} for r in result.records],
                        columns=STEPS_COLUMNS)


def arms_frame(result: RunResult) -> pd.DataFrame:
    return pd.DataFrame([{c: getattr(r, c) for c in ARMS_COLUMNS} for r in result.records],
                        columns=ARMS_COLUMNS)


def summary_dict(cfg: RunConfig, result: RunResult) -> dict:
    return {
        'schema_version': SCHEMA_VERSION,
        'digest': cfg.digest(),
        'seed': cfg.seed,
        'method': cfg.method_label(),
        'schedule': cfg.schedule.label(),
        'eps_floor': cfg.schedule.eps_floor,
        'context_diameter': cfg.context_diameter,
        'steps': len(result.records),
        'generated': sum(r.generated for r in result.records),
        'passed_sw': sum(r.passed_sw for r in result.records),
        'novel': sum(r.novel for r in result.records),
        'inserted': sum(r.inserted for r in result.records),
        'realism': round(result.realism, 6),
        'novelty': round(result.novelty, 6),
        'population_size': len(result.population),
    }


def write_run(cfg: RunConfig, result: RunResult, output_dir, listing=None) -> Path:
    """
    Write every output file of one run

    Args:
        cfg: Configuration the run was executed with
        result: Engine result
        output_dir: Parent directory; the run directory is created inside it
        listing: Registry listing at the context radius for the policy dump's idx column

    Returns:
        Path: The run directory
    """
    run_dir = Path(output_dir) / run_dir_name(cfg)
    run_dir.mkdir(parents=True, exist_ok=True)

    DataReader.write_csv(steps_frame(result), run_dir / STEPS_FILE)
    DataReader.write_csv(arms_frame(result), run_dir / ARMS_FILE)
    DataReader.write_json(summary_dict(cfg, result), run_dir / SUMMARY_FILE)
    DataReader.write_lines(population_lines(result.population), run_dir / POPULATION_FILE)
    DataReader.write_csv(pd.DataFrame(result.table.rows(listing), columns=POLICY_COLUMNS),
                         run_dir / POLICY_FILE, sep='\t')
    DataReader.write_yaml({'run': cfg.to_dict()}, run_dir / CONFIG_FILE)

    logger.info(f"Run outputs written: {run_dir}")
    return run_dir


def read_steps(run_dir) -> pd.DataFrame:
    """
    Load steps.csv from a run directory

    Raises:
        FileNotFoundError: Not a completed run directory
        ValueError: Header does not match the steps schema
    """
    path = Path(run_dir) / STEPS_FILE
    if not path.is_file():
        raise FileNotFoundError(f"No {STEPS_FILE} in {run_dir}")
    frame = DataReader.read_csv(path)
    if list(frame.columns) != STEPS_COLUMNS:
        raise ValueError(f"Unexpected {STEPS_FILE} header in {run_dir}: {list(frame.columns)}")
    return frame

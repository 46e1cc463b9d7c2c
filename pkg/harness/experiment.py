"""
Experiment sweeps
Runs every configuration of an ExperimentSpec under every seed, in parallel worker processes, then
aggregates per configuration
"""
import logging
from pathlib import Path

import pandas as pd
from joblib import Parallel, delayed

from chem.realism import ReferenceRegistry
from config.config import Config
from config.run_config import ExperimentSpec, RunConfig
from harness.outputs import run_dir_name, write_run
from search import engine
from utils.data_reader import DataReader

logger = logging.getLogger(__name__)

RUNS_FILE = 'runs.csv'
TABLE_FILE = 'table.csv'
BEST_FILE = 'best.csv'

RUN_COLUMNS = ['config', 'digest', 'seed', 'method', 'schedule', 'eps', 'context_diameter',
               'realism', 'novelty', 'status', 'error']
TABLE_COLUMNS = ['config', 'method', 'schedule', 'eps', 'context_diameter',
                 'realism_mean', 'realism_std', 'novelty_mean', 'novelty_std', 'runs', 'status']


def config_id(cfg: RunConfig) -> str:
    """Seed-independent configuration identifier (digest of the seed-0 configuration)"""
    return cfg.replace(seed=0).digest()


def _describe(cfg: RunConfig) -> dict:
    baseline = cfg.method_label() == 'baseline'
    return {
        'config': config_id(cfg),
        'method': cfg.method_label(),
        'schedule': '' if baseline else cfg.schedule.label(),
        'eps': None if baseline else cfg.schedule.eps_floor,
        'context_diameter': None if baseline else cfg.context_diameter,
    }


def execute_run(cfg: RunConfig, reg: ReferenceRegistry, runs_dir) -> dict:
    """
    Task launcher for one (configuration, seed) pair

    Failures are captured in the returned row instead of propagating, so one failing run never
    stops the rest of the sweep.
    """
    row = {**_describe(cfg), 'digest': cfg.digest(), 'seed': cfg.seed,
           'realism': None, 'novelty': None, 'status': 'ok', 'error': ''}
    try:
        result = engine.run(cfg, reg)
        write_run(cfg, result, runs_dir, reg.listing(cfg.context_diameter // 2))
        row['realism'] = result.realism
        row['novelty'] = result.novelty
    except Exception as e:
        logger.error(f"Run {run_dir_name(cfg)} failed: {e}")
        row['status'] = 'failed'
        row['error'] = f"{type(e).__name__}: {e}"
    return row


def aggregate(runs: pd.DataFrame) -> pd.DataFrame:
    """
    One row per configuration: mean and sample std of realism and novelty over its runs

    Rows are independent of run order. A configuration with any failed run is reported with
    status 'failed' and no metrics.
    """
    rows = []
    for _, group in runs.groupby('config', sort=False):
        group = group.sort_values('seed')
        first = group.iloc[0]
        row = {c: first[c] for c in ('config', 'method', 'schedule', 'eps', 'context_diameter')}
        failed = (group['status'] != 'ok').any()
        if failed:
            row.update(realism_mean=None, realism_std=None, novelty_mean=None, novelty_std=None,
                       runs=int((group['status'] == 'ok').sum()), status='failed')
        else:
            single = len(group) == 1
            row.update(
                realism_mean=group['realism'].mean(),
                realism_std=0.0 if single else group['realism'].std(ddof=1),
                novelty_mean=group['novelty'].mean(),
                novelty_std=0.0 if single else group['novelty'].std(ddof=1),
                runs=len(group),
                status='ok',
            )
        rows.append(row)
    table = pd.DataFrame(rows, columns=TABLE_COLUMNS).astype({'context_diameter': 'Int64', 'runs': int})
    order = table['method'].ne('baseline')
    return (table.assign(_policy=order)
            .sort_values(['_policy', 'context_diameter', 'eps', 'schedule'], na_position='first', kind='stable')
            .drop(columns='_policy')
            .reset_index(drop=True))


def best_per_setting(table: pd.DataFrame) -> pd.DataFrame:
    """
    Collapse schedules: keep the highest mean realism for each (eps, context diameter)

    The baseline row is kept as is.
    """
    baseline = table[table['method'] == 'baseline']
    policy = table[(table['method'] != 'baseline') & (table['status'] == 'ok')]
    if policy.empty:
        return baseline.reset_index(drop=True)
    ranked = policy.sort_values(['context_diameter', 'eps', 'realism_mean', 'schedule'],
                                ascending=[True, True, False, True], kind='stable')
    best = ranked.groupby(['context_diameter', 'eps'], sort=True).head(1)
    return pd.concat([baseline, best], ignore_index=True)


def worker_count(spec: ExperimentSpec, n_jobs: int = None) -> int:
    """Explicit worker count, else experiment.n_jobs, else PARALLEL_WORKERS"""
    return n_jobs or spec.n_jobs or Config.PARALLEL_WORKERS


def run_sweep(spec: ExperimentSpec, reg: ReferenceRegistry, output_dir, n_jobs: int = None) -> dict:
    """
    Run every configuration under every seed and write the aggregate tables

    Args:
        spec: Experiment specification
        reg: Shared reference registry
        output_dir: Output directory (run directories go under ``runs/``)
        n_jobs: Worker processes (see worker_count)

    Returns:
        dict: Paths of runs.csv, table.csv and best.csv, plus the aggregate ``table`` frame
    """
    output_dir = Path(output_dir)
    runs_dir = output_dir / 'runs'
    configs = spec.configurations()
    jobs = [cfg.replace(seed=seed) for cfg in configs for seed in spec.seeds]
    n_jobs = worker_count(spec, n_jobs)
    logger.info(f"Sweep: {len(configs)} configuration(s) x {spec.runs} run(s) = {len(jobs)} runs, "
                f"{n_jobs} worker(s)")

    rows = Parallel(n_jobs=n_jobs, backend='loky')(delayed(execute_run)(cfg, reg, runs_dir) for cfg in jobs)
    runs = pd.DataFrame(rows, columns=RUN_COLUMNS).astype({'context_diameter': 'Int64'})
    failed = runs[runs['status'] != 'ok']
    if not failed.empty:
        logger.warning(f"{len(failed)} run(s) failed; their configuration rows are marked failed")

    table = aggregate(runs)
    for _, row in table.iterrows():
        if row['status'] == 'ok':
            logger.info(f"{row['method']} {row['schedule']} eps={row['eps']}: "
                        f"realism {row['realism_mean']:.4f} +/- {row['realism_std']:.4f}, "
                        f"novelty {row['novelty_mean']:.4f} +/- {row['novelty_std']:.4f}")

    paths = {
        'runs': output_dir / RUNS_FILE,
        'table': output_dir / TABLE_FILE,
        'best': output_dir / BEST_FILE,
    }
    DataReader.write_csv(runs.sort_values(['config', 'seed'], kind='stable'), paths['runs'])
    DataReader.write_csv(table, paths['table'])
    DataReader.write_csv(best_per_setting(table), paths['best'])
    return {**paths, 'table_frame': table}

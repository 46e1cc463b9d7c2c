"""
Configuration management for the molecular design toolkit
Loads environment variables and provides centralized configuration access
"""
import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file
env_path = Path(__file__).parent.parent / '.env'
load_dotenv(dotenv_path=env_path)


class Config:
    """Central configuration class for the toolkit"""

    # Environment
    ENV = os.getenv('ENV', 'dev')
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO').upper()

    # Project Paths
    PROJECT_ROOT = Path(__file__).parent.parent
    DATA_DIR = PROJECT_ROOT / 'data'
    CONFIGS_DIR = DATA_DIR / 'configs'
    RESULTS_DIR = Path(os.getenv('MOLEVO_RESULTS', str(PROJECT_ROOT / 'results')))
    LOGS_DIR = PROJECT_ROOT / 'logs'

    # Reference data
    CORPUS_PATH = Path(os.getenv('MOLEVO_CORPUS', str(DATA_DIR / 'corpus' / 'sample_corpus.smi')))
    REGISTRY_PATH = Path(os.getenv('MOLEVO_REGISTRY', str(DATA_DIR / 'registry' / 'sample.swreg')))

    # Parallel Execution
    PARALLEL_WORKERS = int(os.getenv('PARALLEL_WORKERS', '4'))

    # Reporting
    FLOAT_FORMAT = '%.6f'
    WINDOW = int(os.getenv('MOLEVO_WINDOW', '10'))

    @classmethod
    def create_directories(cls):
        """Create necessary directories if they don't exist"""
        for directory in [cls.RESULTS_DIR, cls.LOGS_DIR]:
            directory.mkdir(parents=True, exist_ok=True)

    @classmethod
    def get_config_summary(cls):
        """Get a summary of current configuration"""
        return {
            'environment': cls.ENV,
            'log_level': cls.LOG_LEVEL,
            'corpus': str(cls.CORPUS_PATH),
            'registry': str(cls.REGISTRY_PATH),
            'results_dir': str(cls.RESULTS_DIR),
            'parallel_workers': cls.PARALLEL_WORKERS
        }


# Create directories on import
Config.create_directories()

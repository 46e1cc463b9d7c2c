"""
Data reader utility for configuration, corpus and result files
Supports YAML, JSON, CSV and line-oriented text formats
"""
import json
import logging
from pathlib import Path

import pandas as pd
import yaml

from config.config import Config

logger = logging.getLogger(__name__)


class DataReader:
    """Utility class for reading and writing the toolkit's data files"""

    @staticmethod
    def resolve(filename):
        """
        Resolve a file name against the data directory

        Absolute paths and paths that exist relative to the working directory are used as given.

        Args:
            filename: File name or path

        Returns:
            Path: Resolved path
        """
        path = Path(filename)
        if path.is_absolute() or path.exists():
            return path
        return Config.DATA_DIR / path

    @staticmethod
    def read_yaml(filename):
        """
        Read YAML file

        Args:
            filename: YAML file name or path

        Returns:
            dict: Parsed YAML data
        """
        filepath = DataReader.resolve(filename)
        try:
            with open(filepath, 'r', encoding='utf-8') as file:
                data = yaml.safe_load(file)
                logger.info(f"Successfully read YAML file: {filepath}")
                return data
        except FileNotFoundError:
            logger.error(f"YAML file not found: {filepath}")
            raise
        except yaml.YAMLError as e:
            logger.error(f"Error parsing YAML file: {e}")
            raise

    @staticmethod
    def read_csv(filename):
        """
        Read CSV file

        Args:
            filename: CSV file name or path

        Returns:
            pd.DataFrame: File content
        """
        filepath = DataReader.resolve(filename)
        try:
            data = pd.read_csv(filepath)
            logger.info(f"Successfully read CSV file: {filepath}")
            return data
        except FileNotFoundError:
            logger.error(f"CSV file not found: {filepath}")
            raise

    @staticmethod
    def read_lines(filename):
        """
        Read a UTF-8 text file as a list of lines without line terminators

        Args:
            filename: File name or path

        Returns:
            list: Lines of the file
        """
        filepath = DataReader.resolve(filename)
        try:
            with open(filepath, 'r', encoding='utf-8') as file:
                lines = [line.rstrip('\r\n') for line in file]
                logger.info(f"Successfully read {len(lines)} lines: {filepath}")
                return lines
        except FileNotFoundError:
            logger.error(f"Text file not found: {filepath}")
            raise

    @staticmethod
    def write_json(data, filepath):
        """
        Write data to JSON file

        Args:
            data: Data to write
            filepath: Output path
        """
        filepath = Path(filepath)
        try:
            filepath.parent.mkdir(parents=True, exist_ok=True)
            with open(filepath, 'w', encoding='utf-8') as file:
                json.dump(data, file, indent=4, ensure_ascii=False, sort_keys=True)
                file.write('\n')
                logger.info(f"Successfully wrote JSON file: {filepath}")
        except Exception as e:
            logger.error(f"Error writing JSON file: {e}")
            raise

    @staticmethod
    def write_csv(frame, filepath, sep=','):
        """
        Write a DataFrame with fixed float formatting and '\\n' line endings

        Args:
            frame: pandas DataFrame or list of row dicts
            filepath: Output path
            sep: Field separator
        """
        filepath = Path(filepath)
        if not isinstance(frame, pd.DataFrame):
            frame = pd.DataFrame(frame)
        try:
            filepath.parent.mkdir(parents=True, exist_ok=True)
            frame.to_csv(filepath, sep=sep, index=False, float_format=Config.FLOAT_FORMAT, lineterminator='\n')
            logger.info(f"Successfully wrote CSV file: {filepath}")
        except Exception as e:
            logger.error(f"Error writing CSV file: {e}")
            raise

    @staticmethod
    def write_lines(lines, filepath):
        """
        Write lines joined by '\\n' with a trailing newline

        Args:
            lines: Iterable of strings
            filepath: Output path
        """
        filepath = Path(filepath)
        filepath.parent.mkdir(parents=True, exist_ok=True)
        lines = list(lines)
        filepath.write_text(''.join(f"{line}\n" for line in lines), encoding='utf-8')
        logger.info(f"Successfully wrote {len(lines)} lines: {filepath}")

    @staticmethod
    def write_yaml(data, filepath):
        """
        Write data to YAML file with keys in insertion order

        Args:
            data: Data to write
            filepath: Output path
        """
        filepath = Path(filepath)
        try:
            filepath.parent.mkdir(parents=True, exist_ok=True)
            with open(filepath, 'w', encoding='utf-8') as file:
                yaml.safe_dump(data, file, sort_keys=False, default_flow_style=False)
                logger.info(f"Successfully wrote YAML file: {filepath}")
        except Exception as e:
            logger.error(f"Error writing YAML file: {e}")
            raise

import math
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from loguru import logger

from src.core.interval_scan import Track
from src.utils.errors import InputDataError


class DataParser:
    """
    Reads p-value lists and probe tracks from delimited text files into the
    core types. Every failure names the file and the offending line.
    """

    # Delimiter guessed from the file suffix when none is given
    SUFFIX_DELIMITERS = {".csv": ",", ".tsv": "\t", ".tab": "\t"}

    @staticmethod
    def _check_exists(file_path: Path) -> Path:
        file_path = Path(file_path)
        if not file_path.is_file():
            logger.error(f"File not found: {file_path}")
            raise InputDataError(f"Cannot read input file: {file_path}")
        return file_path

    @staticmethod
    def _delimiter_for(file_path: Path, delimiter: Optional[str]) -> Optional[str]:
        if delimiter:
            return "\t" if delimiter in ("\\t", "tab") else delimiter
        return DataParser.SUFFIX_DELIMITERS.get(file_path.suffix.lower())

    @staticmethod
    def _is_number(token: str) -> bool:
        try:
            float(token)
            return True
        except ValueError:
            return False

    @staticmethod
    def _split(line: str, delimiter: Optional[str]) -> List[str]:
        return [t.strip().strip('"') for t in (line.split(delimiter) if delimiter else line.split())]

    @staticmethod
    def _numbered_rows(file_path: Path, delimiter: Optional[str]) -> List[Tuple[int, List[str]]]:
        """(line number, tokens) for every non-blank, non-comment line."""
        try:
            content = file_path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            logger.error(f"Failed to read {file_path}: {e}")
            raise InputDataError(f"Cannot read input file {file_path}: {e}") from e

        rows = []
        for line_no, line in enumerate(content.splitlines(), start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            rows.append((line_no, DataParser._split(line, delimiter)))
        return rows

    @staticmethod
    def parse_pvalues(file_path: Path, column: Optional[str] = None,
                      delimiter: Optional[str] = None) -> np.ndarray:
        """
        One p-value per line, or the named column of a delimited file with a
        header row. A non-numeric first line of a one-column file is taken
        as a header.
        """
        file_path = DataParser._check_exists(file_path)
        delimiter = DataParser._delimiter_for(file_path, delimiter)
        if column is not None:
            return DataParser._parse_pvalue_column(file_path, column, delimiter or ",")

        rows = DataParser._numbered_rows(file_path, delimiter)
        if rows and not DataParser._is_number(rows[0][1][0]):
            rows = rows[1:]

        values = []
        for line_no, tokens in rows:
            token = tokens[0]
            if not DataParser._is_number(token):
                raise InputDataError(f"{file_path.name}, line {line_no}: cannot parse '{token}' as a p-value")
            value = float(token)
            if not 0.0 <= value <= 1.0:
                raise InputDataError(f"{file_path.name}, line {line_no}: p-value {token} is outside [0, 1]")
            values.append(value)

        if not values:
            raise InputDataError(f"{file_path.name}: no p-values found")
        logger.info(f"Parsed {len(values)} p-values from {file_path.name}")
        return np.array(values)

    @staticmethod
    def _parse_pvalue_column(file_path: Path, column: str, delimiter: str) -> np.ndarray:
        try:
            frame = pd.read_csv(file_path, sep=delimiter, dtype=str, skip_blank_lines=False)
        except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
            logger.error(f"Failed to parse {file_path}: {e}")
            raise InputDataError(f"Cannot parse {file_path.name}: {e}") from e

        if column not in frame.columns:
            raise InputDataError(
                f"{file_path.name}: no column '{column}' (columns: {', '.join(map(str, frame.columns))})"
            )
        # wholly blank lines carry no data; a blank cell in a data row does
        raw = frame.loc[~frame.isna().all(axis=1), column]
        for idx in raw.index[raw.isna()]:
            raise InputDataError(f"{file_path.name}, line {idx + 2}, column '{column}': empty cell")
        numbers = pd.to_numeric(raw, errors="coerce")
        for idx in raw.index[numbers.isna()]:
            # header is line 1, data row 0 is line 2
            raise InputDataError(
                f"{file_path.name}, line {idx + 2}, column '{column}': cannot parse '{raw[idx]}' as a p-value"
            )
        outside = numbers[(numbers < 0.0) | (numbers > 1.0)]
        for idx, value in outside.items():
            raise InputDataError(
                f"{file_path.name}, line {idx + 2}, column '{column}': p-value {raw[idx]} is outside [0, 1]"
            )
        if numbers.empty:
            raise InputDataError(f"{file_path.name}: column '{column}' is empty")

        logger.info(f"Parsed {len(numbers)} p-values from {file_path.name} (column '{column}')")
        return numbers.to_numpy(dtype=float)

    @staticmethod
    def parse_track(file_path: Path, delimiter: Optional[str] = None) -> Track:
        """
        Two columns per line: probe position (integer) and value. A header
        line is detected when its first two fields are not numbers.
        """
        file_path = DataParser._check_exists(file_path)
        delimiter = DataParser._delimiter_for(file_path, delimiter)
        rows = DataParser._numbered_rows(file_path, delimiter)
        if rows and not all(DataParser._is_number(t) for t in rows[0][1][:2]):
            rows = rows[1:]

        positions, values = [], []
        for line_no, tokens in rows:
            if len(tokens) < 2:
                raise InputDataError(f"{file_path.name}, line {line_no}: expected 'position, value', got {tokens}")
            position, value = tokens[0], tokens[1]
            try:
                number = float(position)
            except ValueError:
                number = math.nan
            if not number.is_integer():
                raise InputDataError(
                    f"{file_path.name}, line {line_no}, column 1: position '{position}' is not an integer"
                )
            positions.append(int(number))
            if not DataParser._is_number(value):
                raise InputDataError(f"{file_path.name}, line {line_no}, column 2: bad value '{value}'")
            values.append(float(value))

        if len(values) < 2:
            raise InputDataError(f"{file_path.name}: a track needs at least 2 probes, found {len(values)}")
        logger.info(f"Parsed track of {len(values)} probes from {file_path.name}")
        return Track(np.array(values), np.array(positions))

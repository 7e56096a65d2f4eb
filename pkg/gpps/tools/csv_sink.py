from __future__ import annotations

import csv
import os
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from gpps.utils.internal import warn


class CSVSink:
    """
    A utility class for saving tabular run records (observable samples,
    gradient-flow iterations, reduction errors) to a CSV file. Rows are dicts;
    the header is written on the first append and its field order is kept for
    the rest of the file.

    !!! tip

        CSVSink allows to pass custom data alongside every row, e.g. the `eps`
        of a reduction run, which is appended as extra columns.

    Args:
        file_name (str): The name of the CSV file where the rows will be stored.
            Defaults to 'output.csv'.
        field_names (Optional[Sequence[str]]): Fixed header, e.g.
            `gpps.config.OBSERVABLES_HEADER`. Inferred from the first append
            when omitted.

    Example:
        ```python
        from gpps.config import OBSERVABLES_HEADER
        from gpps.dynamics import evolve
        from gpps.tools.csv_sink import CSVSink

        result = evolve(params, psi0, T=1.0, dt=1e-3)
        with CSVSink("runs/observables.csv", OBSERVABLES_HEADER) as sink:
            sink.append(result.series.rows())
        ```
    """

    def __init__(
        self,
        file_name: str = "output.csv",
        field_names: Optional[Sequence[str]] = None,
    ) -> None:
        self.file_name = file_name
        self.file: Optional[open] = None
        self.writer: Optional[csv.writer] = None
        self.header_written = False
        self.field_names: List[str] = list(field_names or [])

    def __enter__(self) -> CSVSink:
        self.open()
        return self

    def __exit__(
        self,
        exc_type: Optional[type],
        exc_val: Optional[Exception],
        exc_tb: Optional[Any],
    ) -> None:
        self.close()

    def open(self) -> None:
        """
        Open the CSV file for writing, creating missing parent directories.
        """
        parent_directory = os.path.dirname(self.file_name)
        if parent_directory and not os.path.exists(parent_directory):
            os.makedirs(parent_directory)

        self.file = open(self.file_name, "w", newline="")
        self.writer = csv.writer(self.file)

    def close(self) -> None:
        if self.file:
            self.file.close()

    @staticmethod
    def parse_field_names(
        rows: List[Dict[str, Any]], custom_data: Optional[Dict[str, Any]] = None
    ) -> List[str]:
        field_names: List[str] = []
        for row in rows:
            field_names.extend(key for key in row if key not in field_names)
        dynamic_header = sorted(set((custom_data or {}).keys()) - set(field_names))
        return field_names + dynamic_header

    @staticmethod
    def format_value(value: Any) -> str:
        if isinstance(value, np.generic):
            value = value.item()
        if value is None:
            return ""
        if isinstance(value, float):
            return repr(value)
        return str(value)

    def append(
        self,
        rows: List[Dict[str, Any]],
        custom_data: Optional[Dict[str, Any]] = None,
    ) -> None:
        """
        Append rows to the CSV file.

        Floats are written with `repr`, so values read back with `float` are
        bit-identical.

        Args:
            rows (List[Dict[str, Any]]): Rows keyed by field name.
            custom_data (Optional[Dict[str, Any]]): Values added to every row.
        """
        if not self.writer:
            raise ValueError(
                f"Cannot append to CSV: The file '{self.file_name}' is not open."
            )
        if not rows:
            return
        field_names = CSVSink.parse_field_names(rows, custom_data)
        if not self.header_written:
            if not self.field_names:
                self.field_names = field_names
            self.writer.writerow(self.field_names)
            self.header_written = True

        if set(field_names) != set(self.field_names):
            warn(
                f"Field names do not match the header. "
                f"Expected: {self.field_names}, given: {field_names}"
            )

        for row in rows:
            merged = {**row, **(custom_data or {})}
            self.writer.writerow(
                [self.format_value(merged.get(name)) for name in self.field_names]
            )

from __future__ import annotations

import json
import os
from typing import Any, Dict, List, Optional

from gpps.utils.file import NumpyJsonEncoder


class JSONSink:
    """
    A utility class for saving a list of records (regime verdicts, kernel
    audit rows) to a JSON file. Rows are collected in memory and written as
    one JSON array when the sink is closed.

    Args:
        file_name (str): The name of the JSON file where the rows will be stored.
            Defaults to 'output.json'.

    Example:
        ```python
        from gpps.kernels import kernel_check_table
        from gpps.tools.json_sink import JSONSink

        with JSONSink("runs/kernel_check.json") as sink:
            sink.append(kernel_check_table([0.1, 1.0], [0.5]))
        ```
    """

    def __init__(self, file_name: str = "output.json") -> None:
        self.file_name = file_name
        self.file: Optional[open] = None
        self.data: List[Dict[str, Any]] = []

    def __enter__(self) -> JSONSink:
        self.open()
        return self

    def __exit__(
        self,
        exc_type: Optional[type],
        exc_val: Optional[Exception],
        exc_tb: Optional[Any],
    ) -> None:
        self.write_and_close()

    def open(self) -> None:
        parent_directory = os.path.dirname(self.file_name)
        if parent_directory and not os.path.exists(parent_directory):
            os.makedirs(parent_directory)

        self.file = open(self.file_name, "w")

    def write_and_close(self) -> None:
        if self.file:
            json.dump(self.data, self.file, cls=NumpyJsonEncoder, indent=4)
            self.file.close()

    def append(
        self,
        rows: List[Dict[str, Any]],
        custom_data: Optional[Dict[str, Any]] = None,
    ) -> None:
        """
        Queue rows for writing.

        Args:
            rows (List[Dict[str, Any]]): Rows keyed by field name.
            custom_data (Optional[Dict[str, Any]]): Values added to every row.
        """
        if not self.file:
            raise ValueError(
                f"Cannot append to JSON: The file '{self.file_name}' is not open."
            )
        for row in rows:
            self.data.append({**row, **(custom_data or {})})

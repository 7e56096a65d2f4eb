import json
import os
import tempfile

import numpy as np


class NumpyJsonEncoder(json.JSONEncoder):
    def default(self, obj):
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.bool_):
            return bool(obj)
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, complex):
            return [obj.real, obj.imag]
        return super(NumpyJsonEncoder, self).default(obj)


def read_json_file(file_path: str) -> dict:
    """
    Read a json file and return a dict.

    Args:
        file_path (str): The path to the json file.

    Returns:
        dict: Parsed content.
    """
    with open(file_path, "r") as file:
        data = json.load(file)
    return data


def save_json_file(data: dict, file_path: str, indent: int = 3) -> None:
    """
    Write a dict to a json file. Numpy scalars and arrays are converted to
    plain Python values.

    Args:
        data (dict): Content to serialize.
        file_path (str): The path to the json file.
        indent (int): Indentation passed to `json.dump`.
    """
    with open(file_path, "w") as fp:
        json.dump(data, fp, cls=NumpyJsonEncoder, indent=indent)


def save_json_file_atomic(data: dict, file_path: str, indent: int = 3) -> None:
    """
    Write a dict to a json file through a temporary file in the same directory
    followed by `os.replace`, so readers never observe a partial file.

    Args:
        data (dict): Content to serialize.
        file_path (str): The destination path.
        indent (int): Indentation passed to `json.dump`.
    """
    directory = os.path.dirname(os.path.abspath(file_path))
    os.makedirs(directory, exist_ok=True)
    descriptor, temporary_path = tempfile.mkstemp(
        prefix=".tmp-", suffix=".json", dir=directory
    )
    try:
        with os.fdopen(descriptor, "w") as fp:
            json.dump(data, fp, cls=NumpyJsonEncoder, indent=indent)
        os.replace(temporary_path, file_path)
    except BaseException:
        if os.path.exists(temporary_path):
            os.remove(temporary_path)
        raise

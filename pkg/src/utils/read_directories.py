import os
from typing import List


def read_filenames_in_directory(directory: str, extension: str = "") -> List[str]:
    """
    Read all files in a directory and return a sorted list of file paths.

    Args:
        directory: The path to the directory to read
        extension: Only keep files with this suffix (e.g. ".peg"); all files when empty

    Returns:
        Sorted list of file paths in the directory

    Raises:
        ValueError: If the path is not a directory
    """
    if not os.path.isdir(directory):
        raise ValueError(f"The provided path '{directory}' is not a valid directory.")

    files = [
        os.path.join(directory, f) for f in os.listdir(directory)
        if os.path.isfile(os.path.join(directory, f)) and f.endswith(extension)
    ]
    return sorted(files)


def read_text_file(file_path: str) -> str:
    if not os.path.isfile(file_path):
        raise FileNotFoundError(f"File not found: {file_path}")
    with open(file_path, 'r', encoding='utf-8') as f:
        return f.read()


def read_binary_file(file_path: str) -> bytes:
    if not os.path.isfile(file_path):
        raise FileNotFoundError(f"File not found: {file_path}")
    with open(file_path, 'rb') as f:
        return f.read()

import os


def write_image(output_path: str, data: bytes) -> int:
    """
    Write an encoded bytecode image.

    Args:
        output_path: Path of the .pvb file; missing parent directories are created
        data: Image bytes from encode()

    Returns:
        Number of bytes written
    """
    directory = os.path.dirname(output_path)
    if directory:
        os.makedirs(directory, exist_ok=True)

    with open(output_path, 'wb') as f:
        f.write(data)

    print(f"[✔] Saved {len(data)} byte image to: {output_path}")
    return len(data)

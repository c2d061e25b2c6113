import logging
import os
from typing import Dict, List, Optional

import numpy as np
from PIL import Image, ImageDraw, ImageFont

from src.optimizer.pipeline import PASS_ORDER

logger = logging.getLogger(__name__)

STAGES = ("plain",) + PASS_ORDER
STAGE_LABELS = {"plain": "non-opt", "lexical": "lex"}

STAGE_COLORS = [
    '#7F7F7F',  # Gray
    '#1F77B4',  # Blue
    '#2CA02C',  # Green
    '#FF7F0E',  # Orange
    '#9467BD',  # Purple
    '#D62728',  # Red
]


def stage_percentages(sizes: Dict[str, Optional[int]]) -> np.ndarray:
    """
    Size after every stage as a percentage of the plain size.

    A stage that was not applied keeps the size of the stage before it.
    """
    values: List[float] = []
    last = sizes["plain"]
    for stage in STAGES:
        if sizes.get(stage) is not None:
            last = sizes[stage]
        values.append(last)
    return 100.0 * np.asarray(values, dtype=float) / float(sizes["plain"])


def _font(size: int):
    try:
        # Try to use a font (might not be available on all systems)
        return ImageFont.truetype("arial.ttf", size=size)
    except OSError:
        return ImageFont.load_default()


def create_size_chart(series: Dict[str, Dict[str, Optional[int]]], output_path: str,
                      bar_width: int = 18, height: int = 320):
    """
    Draw the cumulative downsizing chart: per grammar one bar per stage,
    scaled to the plain size of that grammar.

    Args:
        series: Grammar name -> stage name -> code bytes (must contain "plain")
        output_path: PNG file to write
        bar_width: Width of one bar in pixels
        height: Height of the plotting area in pixels
    """
    if not series:
        raise ValueError("No size series to draw.")

    margin, legend_height = 40, 30
    group_width = bar_width * len(STAGES) + bar_width
    width = max(2 * margin + group_width * len(series), 2 * margin + 400)
    image = Image.new("RGB", (width, height + 2 * margin + legend_height), "white")
    draw = ImageDraw.Draw(image)
    font = _font(12)

    base_y = margin + height
    for percent in range(0, 101, 20):
        y = base_y - height * percent // 100
        draw.line([(margin, y), (width - margin, y)], fill='#DDDDDD', width=1)
        draw.text((4, y - 6), f"{percent}%", fill='black', font=font)

    for group, (name, sizes) in enumerate(series.items()):
        x0 = margin + group * group_width + bar_width // 2
        for i, percent in enumerate(stage_percentages(sizes)):
            x1 = x0 + i * bar_width
            top = base_y - int(round(height * min(percent, 100.0) / 100.0))
            draw.rectangle([x1, top, x1 + bar_width - 2, base_y], fill=STAGE_COLORS[i], outline='black')
        label_box = draw.textbbox((0, 0), name, font=font)
        label_x = x0 + (bar_width * len(STAGES) - (label_box[2] - label_box[0])) // 2
        draw.text((label_x, base_y + 6), name, fill='black', font=font)

    legend_y = base_y + margin
    x = margin
    for i, stage in enumerate(STAGES):
        draw.rectangle([x, legend_y, x + 10, legend_y + 10], fill=STAGE_COLORS[i], outline='black')
        text = STAGE_LABELS.get(stage, stage)
        draw.text((x + 14, legend_y - 2), text, fill='black', font=font)
        x += 24 + int(draw.textlength(text, font=font))

    directory = os.path.dirname(output_path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    image.save(output_path)
    logger.info("Size chart saved to: %s", output_path)

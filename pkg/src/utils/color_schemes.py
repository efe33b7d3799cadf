"""
Colour coding for graph exports.

Edges are coloured by the security class of their action:
- Warm colours (reds) for high actions
- Cool colours (blues) for low actions
- Greys for tau
Nodes of a partition export are filled from a light palette, one colour
per block, cycling when there are more blocks than colours.
"""

from typing import Dict, Tuple

from core.models import ActionClass

# RGB color tuples (R, G, B)
ACTION_COLORS: Dict[ActionClass, Tuple[int, int, int]] = {
    ActionClass.HIGH: (220, 20, 60),     # Crimson
    ActionClass.LOW: (70, 130, 180),     # Steel blue
    ActionClass.TAU: (128, 128, 128),    # Gray
}

# Accessibility support - high contrast versions of the same grouping
HIGH_CONTRAST_ACTION_COLORS: Dict[ActionClass, Tuple[int, int, int]] = {
    ActionClass.HIGH: (255, 0, 0),
    ActionClass.LOW: (0, 0, 255),
    ActionClass.TAU: (0, 0, 0),
}

BLOCK_PALETTE: Tuple[Tuple[int, int, int], ...] = (
    (255, 228, 181),  # Moccasin
    (173, 216, 230),  # Light blue
    (144, 238, 144),  # Light green
    (255, 182, 193),  # Light pink
    (221, 160, 221),  # Plum
    (240, 230, 140),  # Khaki
    (176, 224, 230),  # Powder blue
    (211, 211, 211),  # Light gray
)

ROOT_PEN_WIDTH = "2"


def rgb_to_hex(rgb: Tuple[int, int, int]) -> str:
    """Hex colour string such as "#DC143C"."""
    r, g, b = rgb
    return f"#{r:02X}{g:02X}{b:02X}"


def get_action_color_hex(action_class: ActionClass, high_contrast: bool = False) -> str:
    """
    Get the edge colour for an action class.

    Args:
        action_class: Security class of the transition's action
        high_contrast: Use the accessibility palette

    Returns:
        Hex color string
    """
    palette = HIGH_CONTRAST_ACTION_COLORS if high_contrast else ACTION_COLORS
    return rgb_to_hex(palette.get(action_class, (128, 128, 128)))


def get_block_color_hex(block_index: int) -> str:
    return rgb_to_hex(BLOCK_PALETTE[block_index % len(BLOCK_PALETTE)])

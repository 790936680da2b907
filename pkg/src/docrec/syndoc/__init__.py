"""Synthetic printed lines and documents with layout ground truth."""
from .augment import OPS, augment, change_resolution, dilate_ink, erode_ink
from .font import DEFAULT_FONTS, BitmapFont, FontSet, generate_line, render_line
from .generate import Placement, SynDoc, crop_under_lowest, generate_document
from .io import read_pgm, write_image, write_pgm
from .stylesheet import EntityStyle, LineCorpus, StyleSheet, read_stylesheet, rimes_stylesheet

__all__ = [
    "DEFAULT_FONTS",
    "OPS",
    "BitmapFont",
    "EntityStyle",
    "FontSet",
    "LineCorpus",
    "Placement",
    "StyleSheet",
    "SynDoc",
    "augment",
    "change_resolution",
    "crop_under_lowest",
    "dilate_ink",
    "erode_ink",
    "generate_document",
    "generate_line",
    "read_pgm",
    "read_stylesheet",
    "render_line",
    "rimes_stylesheet",
    "write_image",
    "write_pgm",
]

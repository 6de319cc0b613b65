"""Desk-scale semi-supervised segmentation lab: object-mixing augmentation,
a teacher-student trainer with bilevel feedback, overlap/boundary metrics,
and synthetic cardiac-style phantom data."""

__version__ = "0.1.0"

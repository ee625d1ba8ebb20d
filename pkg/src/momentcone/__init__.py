"""Moment cones of densities: certification, mollification and synthesis."""

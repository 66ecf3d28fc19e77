"""Exact polynomial model of Kuranishi charts, atlases and their 2-category."""

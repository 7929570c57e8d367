"""Safety verification for concurrent pushdown systems.

Parse a system with textfmt, then either call engine.cuba for the combined
procedure or reach for the specific analyses in explicit, symbolic, approx,
and engine.  The cli module wraps the same entry points for scripts.
"""

__version__ = "0.1.0"

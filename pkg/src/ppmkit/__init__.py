"""ppmkit: a predictive process monitoring workbench.

Builds outcome, numeric, and next-activity predictors over XES event logs:
split, prefix, label, encode, train, optimize, evaluate, explain.  Ships a
job orchestrator with content-addressed caching, an HTTP gateway, and a CLI.
"""
from __future__ import annotations

__version__ = "0.1.0"

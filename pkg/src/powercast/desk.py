"""Desk-scale preset: synthetic datasets plus a config that runs in minutes.

Two seeded series at different scales exercise both ingestion paths
(timestamped rows with missing tokens and a comma decimal mark; period-indexed
rows on a native half-hour grid).  The generated config uses the reduced
hyperparameters (hidden 16, 10 epochs, k=5) so the whole pipeline completes
quickly on a laptop.
"""

from __future__ import annotations

import json
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

HOUSE_START = datetime(2021, 1, 1)
HOUSE_DAYS = 120  # holdout: April
GRID_START = datetime(2021, 1, 1)
GRID_DAYS = 150  # holdout: May


def _house_signal(rng: np.random.Generator, n: int, step_s: int) -> np.ndarray:
    t = np.arange(n) * step_s
    day = t / 86400.0
    hour = (t % 86400) / 3600.0
    morning = np.exp(-0.5 * ((hour - 7.5) / 1.5) ** 2)
    evening = np.exp(-0.5 * ((hour - 19.0) / 2.5) ** 2)
    weekday = np.where((day.astype(int) % 7) < 5, 1.0, 0.75)
    seasonal = 1.0 + 0.25 * np.cos(2 * np.pi * day / 365.0)
    base = 0.6 + 2.2 * morning + 3.1 * evening
    noise = rng.normal(0.0, 0.15, n)
    return np.maximum(0.05, base * weekday * seasonal + noise)


def _grid_signal(rng: np.random.Generator, n: int, step_s: int) -> np.ndarray:
    t = np.arange(n) * step_s
    day = t / 86400.0
    hour = (t % 86400) / 3600.0
    daily = 60.0 * np.sin(2 * np.pi * (hour - 4.0) / 24.0)
    weekly = -25.0 * ((day.astype(int) % 7) >= 5)
    trend = 0.08 * day
    noise = rng.normal(0.0, 6.0, n)
    return 320.0 + daily + weekly + trend + noise


def write_house_csv(path: Path, seed: int) -> None:
    rng = np.random.default_rng((seed, 11))
    step_s = 900  # native 15 min, downsampled to 30 min at ingest
    n = HOUSE_DAYS * 86400 // step_s
    values = _house_signal(rng, n, step_s)
    missing = rng.random(n) < 0.01
    missing[0] = False  # forward fill needs a source
    lines = ["Date;Time;Power"]
    for i in range(n):
        stamp = HOUSE_START + timedelta(seconds=i * step_s)
        if missing[i]:
            cell = "?"
        else:
            cell = f"{values[i]:.3f}".replace(".", ",")
        lines.append(f"{stamp:%d/%m/%Y};{stamp:%H:%M:%S};{cell}")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_grid_csv(path: Path, seed: int) -> None:
    rng = np.random.default_rng((seed, 23))
    step_s = 1800  # native half-hour period grid, kept as-is
    n = GRID_DAYS * 86400 // step_s
    values = _grid_signal(rng, n, step_s)
    lines = ["date,period,demand_mw"]
    for i in range(n):
        day = GRID_START + timedelta(days=i // 48)
        period = i % 48 + 1
        lines.append(f"{day:%Y-%m-%d},{period},{values[i]:.2f}")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def desk_config_doc(seed: int = 7) -> dict:
    return {
        "datasets": [
            {
                "name": "house_mini",
                "path": "data/house_mini.csv",
                "unit": "kW",
                "schema": {
                    "time_columns": ["Date", "Time"],
                    "time_format": "%d/%m/%Y %H:%M:%S",
                    "value_column": "Power",
                    "delimiter": ";",
                    "decimal": ",",
                    "missing_token": "?",
                },
                "holdout_boundary": "2021-04-01T00:00:00",
                "resample_interval_s": 1800,
            },
            {
                "name": "grid_mini",
                "path": "data/grid_mini.csv",
                "unit": "MW",
                "schema": {
                    "time_columns": ["date"],
                    "time_format": "%Y-%m-%d",
                    "value_column": "demand_mw",
                    "period_column": "period",
                    "period_minutes": 30,
                },
                "holdout_boundary": "2021-05-01T00:00:00",
            },
        ],
        "archs": ["LSTM", "BLSTM"],
        "hyper": {"hidden": 16, "epochs": 10, "batch": 32, "dropout": 0.3, "window": 90},
        "k": 5,
        "seed": seed,
        "alpha": 0.05,
        "out_dir": "out",
    }


def make_desk_workspace(root, seed: int = 7) -> Path:
    """Write the synthetic CSVs and desk config under ``root``; returns the config path."""
    root = Path(root)
    write_house_csv(root / "data" / "house_mini.csv", seed)
    write_grid_csv(root / "data" / "grid_mini.csv", seed)
    config_path = root / "desk.json"
    config_path.parent.mkdir(parents=True, exist_ok=True)
    config_path.write_text(
        json.dumps(desk_config_doc(seed), indent=2) + "\n", encoding="utf-8"
    )
    return config_path

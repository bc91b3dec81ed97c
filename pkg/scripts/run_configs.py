"""Run every scenario in configs/ with the mode that fits it.

Configs with a "trajectories" block run in traject mode, the two-level decay
sweep runs in steady mode as well, everything else in simulate mode.
"""

import sys
from pathlib import Path

from zenoguard.cli import run_scenario
from zenoguard.config import ScenarioConfig

ROOT = Path(__file__).resolve().parent.parent


def main():
    for path in sorted((ROOT / "configs").glob("*.json")):
        cfg = ScenarioConfig.load(path)
        modes = ["traject"] if cfg.trajectories is not None else ["simulate"]
        if cfg.model == "two_level" and min(cfg.gamma) > 0:
            modes.append("steady")
        for mode in modes:
            print(f"== {path.name}: {mode}")
            run_scenario(cfg, mode)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Where the demos write their files: ``$ROOTSIM_OUT_DIR`` or ``demos/output``."""
import os
from pathlib import Path


def out_dir() -> Path:
    path = Path(os.environ.get("ROOTSIM_OUT_DIR") or Path(__file__).parent / "output")
    path.mkdir(parents=True, exist_ok=True)
    return path

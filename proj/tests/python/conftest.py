import os
import shutil
import sys
import tempfile
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[2]


def _stage_package():
    ext_dir = os.environ.get("IGMIRAG_EXT_DIR")
    if not ext_dir:
        return
    stage = Path(tempfile.mkdtemp(prefix="igmirag-py-"))
    pkg = stage / "igmirag"
    shutil.copytree(ROOT / "python" / "igmirag", pkg)
    for so in Path(ext_dir).glob("_igmirag*"):
        shutil.copy2(so, pkg / so.name)
    sys.path.insert(0, str(stage))


_stage_package()


@pytest.fixture(scope="session")
def fixture_dir():
    return Path(os.environ.get("IGMIRAG_FIXTURE_DIR", ROOT / "tests" / "fixtures"))

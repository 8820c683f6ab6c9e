import os
import shutil

import pytest


@pytest.fixture(scope="session")
def avm_exe():
    exe = os.environ.get("AVM_EXE") or shutil.which("avm")
    if not exe:
        pytest.skip("avm executable not found; set AVM_EXE")
    return exe

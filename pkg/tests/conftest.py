import hypothesis
import numpy as np
import os
import pytest

from commons.funcs_abelian import FiniteAbelianGroup
from commons.mgr_archive import ArchiveManager
from commons.mgr_logger import LoggerManager

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=5)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False)
hypothesis.settings.register_profile("ci", max_examples=50, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))


@pytest.fixture(scope="session", autouse=True)
def _logs_to_tmp(tmp_path_factory):
    LoggerManager.set_logs_dir(str(tmp_path_factory.getbasetemp() / "logs"))


@pytest.fixture
def z2():
    return FiniteAbelianGroup((2,))


@pytest.fixture
def z3():
    return FiniteAbelianGroup((3,))


@pytest.fixture
def z4():
    return FiniteAbelianGroup((4,))


@pytest.fixture
def z5():
    return FiniteAbelianGroup((5,))


@pytest.fixture
def z2z2():
    return FiniteAbelianGroup((2, 2))


@pytest.fixture(scope="session")
def bundled(_logs_to_tmp):
    """
    Loader of bundled solutions by name, re-verified on every call
    """
    return ArchiveManager().load_bundled

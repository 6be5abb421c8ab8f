import shutil

import pytest


def require_primary_cli():
    if shutil.which("radonyaw") is None:
        pytest.skip("radonyaw CLI not installed; cross-component tests need it")

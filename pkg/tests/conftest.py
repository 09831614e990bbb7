import pytest


def pytest_addoption(parser):
    parser.addoption(
        "--extended",
        action="store_true",
        default=False,
        help="run the long 600-digit degree-49 reproduction (can take hours)",
    )


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "extended: long-running reproduction, enabled with --extended"
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--extended"):
        return
    skip = pytest.mark.skip(reason="pass --extended to run")
    for item in items:
        if "extended" in item.keywords:
            item.add_marker(skip)

try:
    from importlib.metadata import PackageNotFoundError
    from importlib.metadata import version as _resolve_package_version
except ImportError:
    from importlib_metadata import PackageNotFoundError  # type: ignore[no-redef]
    from importlib_metadata import version as _resolve_package_version  # type: ignore[no-redef]


def _parse_version():
    try:
        return _resolve_package_version("motionoracle")
    except PackageNotFoundError:
        # running from a source checkout
        return "0.0.0.dev0"


version = _parse_version()

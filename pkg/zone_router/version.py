from importlib import metadata

try:
    metadata_version = metadata.version("zone_router")
except metadata.PackageNotFoundError:
    metadata_version = None


version_string = metadata_version if metadata_version is not None else "unknown"

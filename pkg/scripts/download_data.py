#!/usr/bin/env python
"""
Download the registered datasets into ADVDROP_DATA_DIR (or ./data).

Every fetched file's SHA-256 is written to digests.json in the data
directory so runs can be traced back to exact bytes.

Usage:
    python scripts/download_data.py                 # everything
    python scripts/download_data.py mnist yacht     # selected datasets
"""
import json
import logging
import sys
from pathlib import Path

import httpx

# Add parent directory to sys.path
sys.path.append(str(Path(__file__).parent.parent))

from advdrop.services.data.registry import DATASETS, data_dir
from advdrop.utils.ids import file_digest
from advdrop.utils.logging import configure_logging

logger = logging.getLogger("advdrop.download")


def download(client: httpx.Client, url: str, destination: Path) -> str:
    """Stream one file to disk and return its SHA-256."""
    partial = destination.with_name(destination.name + ".part")
    with client.stream("GET", url) as response:
        response.raise_for_status()
        with open(partial, "wb") as f:
            for chunk in response.iter_bytes():
                f.write(chunk)
    partial.replace(destination)
    return file_digest(destination)


def main(names) -> int:
    configure_logging()
    target = data_dir()
    target.mkdir(parents=True, exist_ok=True)
    digests_path = target / "digests.json"
    digests = json.loads(digests_path.read_text()) if digests_path.is_file() else {}

    selected = names or [name for name, info in DATASETS.items() if info.urls]
    failures = 0
    with httpx.Client(follow_redirects=True, timeout=60.0) as client:
        for name in selected:
            info = DATASETS.get(name)
            if info is None:
                logger.error(f"Unknown dataset: {name}")
                failures += 1
                continue
            for file_name, url in info.urls.items():
                destination = target / file_name
                if destination.is_file():
                    logger.info(f"{destination} exists, skipping")
                    digests[file_name] = file_digest(destination)
                    continue
                try:
                    digests[file_name] = download(client, url, destination)
                    logger.info(f"Fetched {url} -> {destination} ({digests[file_name][:12]})")
                except httpx.HTTPError as e:
                    logger.error(f"Failed to fetch {url}: {e}")
                    failures += 1

    digests_path.write_text(json.dumps(digests, sort_keys=True, indent=2) + "\n")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))

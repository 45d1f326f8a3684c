"""General utilities."""

import hashlib
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from dataclasses import field
from pathlib import Path
from typing import Any
from typing import Callable
from typing import Dict
from typing import Iterable
from typing import List
from typing import Optional
from typing import Sequence
from typing import TypeVar
from typing import Union

from unsup_speech_features.config import THREADS_ENV


logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def read_json(path: Path) -> Any:
    """Read json from path."""
    with open(path, encoding="utf-8") as file:
        return json.load(file)


def save_json(
    path: Path, container: Union[Iterable[Dict[str, Any]], Dict[str, Any], None]
) -> None:
    """Write dict to path."""
    logger.debug("Saving json to %s", path)

    path.parent.mkdir(parents=True, exist_ok=True)

    with open(path, "w", encoding="utf-8") as outfile:
        json.dump(container, outfile, ensure_ascii=False, indent=4, sort_keys=True)


def manifest_path(output: Path) -> Path:
    """Manifest location of an output artifact."""
    return output.with_name(output.name + ".manifest.json")


def read_manifest(output: Path) -> Optional[Dict[str, Any]]:
    """Manifest written next to ``output``, or None when there is none."""
    path = manifest_path(output)
    if not path.is_file():
        return None
    payload: Dict[str, Any] = read_json(path)
    return payload


def canonical_json(values: Dict[str, Any]) -> str:
    """Serialise a mapping to a byte-stable JSON string."""
    return json.dumps(values, sort_keys=True, separators=(",", ":"), default=str)


def config_digest(values: Dict[str, Any]) -> str:
    """Return the hex SHA-256 of the canonical JSON of ``values``."""
    return hashlib.sha256(canonical_json(values).encode("utf-8")).hexdigest()


def digest_u32(values: Dict[str, Any]) -> int:
    """Return the first four digest bytes as an unsigned 32-bit integer."""
    return int(config_digest(values)[:8], 16)


def file_digest(path: Path) -> str:
    """Return the hex SHA-256 of a file's bytes."""
    sha = hashlib.sha256()
    with open(path, "rb") as file:
        for block in iter(lambda: file.read(1 << 16), b""):
            sha.update(block)
    return sha.hexdigest()


def default_threads() -> int:
    """Worker count from ``ZR_THREADS``, falling back to one."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning("Ignoring non-integer %s=%r", THREADS_ENV, raw)
        return 1


def parallel_map(
    function: Callable[[T], R], tasks: Sequence[T], threads: int = 1
) -> List[R]:
    """Map ``function`` over ``tasks``, preserving task order.

    Args:
        function (Callable[[T], R]): A picklable top-level function.
        tasks (Sequence[T]): Inputs, one per call.
        threads (int): Worker processes; 1 runs in-process.

    Returns:
        List[R]: Results in the order of ``tasks``.
    """
    if threads <= 1 or len(tasks) < 2:
        return [function(task) for task in tasks]

    chunksize = max(1, len(tasks) // (threads * 4))
    with ProcessPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(function, tasks, chunksize=chunksize))


@dataclass(frozen=True)
class RunConfig:
    """Effective parameters of one CLI invocation."""

    command: str
    parameters: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        """Plain-dict view, JSON-serialisable."""
        return {
            "command": self.command,
            "parameters": json.loads(canonical_json(self.parameters)),
        }

    @property
    def digest(self) -> str:
        """Stable hash of the command and its effective values."""
        return config_digest(self.to_dict())

    def write_manifest(self, output: Path, extra: Optional[Dict[str, Any]] = None) -> Path:
        """Write ``<output>.manifest.json`` next to an output artifact."""
        manifest = manifest_path(output)
        payload = dict(self.to_dict(), digest=self.digest)
        if extra:
            payload["summary"] = extra
        save_json(manifest, payload)
        return manifest

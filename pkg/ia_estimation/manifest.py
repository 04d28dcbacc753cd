import dataclasses
import datetime
import pathlib
from typing import Any

from .base import DataError
from .utils import read_json, write_json

MANIFEST_SUFFIX = ".manifest.json"


def manifest_path(output: str | pathlib.Path) -> pathlib.Path:
    output = pathlib.Path(output)
    return output.with_name(output.name + MANIFEST_SUFFIX)


def utc_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


@dataclasses.dataclass(frozen=True, slots=True, kw_only=True)
class RunManifest:
    """
    Everything needed to re-run a command: its argv reproduces the outputs bit for bit.

    Timestamps are informational and are the only fields that differ between a run and its replay.
    """

    command: str
    config: dict[str, Any]
    seed: int | None
    version: str
    argv: tuple[str, ...]
    started_at: str
    finished_at: str

    def as_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "version": self.version,
            "argv": list(self.argv),
            "started_at": self.started_at,
            "finished_at": self.finished_at,
        }

    def write(self, output: str | pathlib.Path) -> pathlib.Path:
        path = manifest_path(output)
        write_json(path, self.as_dict())
        return path

    @staticmethod
    def read(path: str | pathlib.Path) -> "RunManifest":
        document = read_json(path)
        try:
            return RunManifest(
                command=str(document["command"]),
                config=dict(document["config"]),
                seed=None if document["seed"] is None else int(document["seed"]),
                version=str(document["version"]),
                argv=tuple(str(a) for a in document["argv"]),
                started_at=str(document["started_at"]),
                finished_at=str(document["finished_at"]),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise DataError(f"{path} is not a run manifest: {e}") from e

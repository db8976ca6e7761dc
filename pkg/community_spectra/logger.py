"""Per-run log files: a text log, a structured JSON record and a console transcript."""

import logging
import time
from datetime import datetime
from pathlib import Path
from typing import Any

import numpy as np

from community_spectra import __version__
from community_spectra.utils import to_json

# Arrays longer than this are summarized in the text log; the JSON keeps them whole
_INLINE_ARRAY_LIMIT = 8


def _flatten(data: Any, prefix: str = '') -> list[tuple[str, Any]]:
    if isinstance(data, dict):
        items = []
        for key, value in data.items():
            items.extend(_flatten(value, f"{prefix}.{key}" if prefix else str(key)))
        return items
    if isinstance(data, (list, tuple, np.ndarray)) and len(data) > _INLINE_ARRAY_LIMIT:
        values = np.asarray(data)
        if values.dtype.kind in 'iuf':
            return [(prefix, f"<{len(values)} values in [{values.min():.6g}, {values.max():.6g}]>")]
        return [(prefix, f"<{len(values)} items>")]
    return [(prefix, data)]


class RunLogger:
    """Log files for one subcommand invocation.

    Three files share the stem spectra_<command>_<timestamp> in log_dir:
    .log (records from every module logger), .json (sections logged through
    log_section plus the session header) and _output.txt (what the UI printed).
    """

    def __init__(self, log_dir: str = "./logs", command: str = "run"):
        """Create the log directory and attach the file handler.

        Args:
            log_dir: Directory for log files
            command: Subcommand name such as "theory band"
        """
        self.command = command
        self.log_dir = Path(log_dir)
        self.log_dir.mkdir(parents=True, exist_ok=True)

        stem = f"spectra_{command.replace(' ', '_')}_{datetime.now():%Y%m%d_%H%M%S}"
        self.log_file = self.log_dir / f"{stem}.log"
        self.json_file = self.log_dir / f"{stem}.json"
        self.text_log_file = self.log_dir / f"{stem}_output.txt"

        self.data: dict[str, Any] = {}
        self._started = time.monotonic()
        self._saved = False
        self._handler = self._attach_handler()

        self.text_log_file.write_text(
            f"community_spectra {__version__} - {command}\n"
            f"Started: {datetime.now():%Y-%m-%d %H:%M:%S}\n"
            + "=" * 80 + "\n\n"
        )

    def _attach_handler(self) -> logging.FileHandler:
        root = logging.getLogger()
        # A previous run in the same process (tests, notebooks) leaves its file open
        for handler in list(root.handlers):
            if isinstance(handler, logging.FileHandler):
                root.removeHandler(handler)
                handler.close()

        handler = logging.FileHandler(self.log_file)
        handler.setFormatter(logging.Formatter('%(asctime)s %(levelname)-7s %(name)s: %(message)s'))
        root.setLevel(logging.INFO)
        root.addHandler(handler)
        return handler

    @property
    def log_path(self) -> Path:
        return self.log_file

    def start_session(self, seed: int, threads: int, config_hash: str):
        """Record the reproducibility header of the run."""
        self.log_section('session', {
            'command': self.command,
            'version': __version__,
            'seed': seed,
            'threads': threads,
            'config_hash': config_hash,
            'started': datetime.now().isoformat(timespec='seconds'),
        })

    def log_section(self, section: str, data: Any):
        """Store a section for the JSON record and echo it to the text log.

        Nested dictionaries are written as dotted keys; long numeric arrays
        are reduced to their length and range in the text log only.

        Args:
            section: Section name, also the JSON key
            data: Any JSON-serializable value (numpy types allowed)
        """
        self.data[section] = data
        logging.info(f"[{section}]")
        for key, value in _flatten(data):
            logging.info(f"  {key} = {value}" if key else f"  {value}")

    def save_json(self) -> Path:
        """Write the collected sections with the run duration.

        Returns:
            Path of the JSON file
        """
        record = dict(self.data)
        record['elapsed_seconds'] = round(time.monotonic() - self._started, 3)
        self.json_file.write_text(to_json(record))
        self._saved = True
        logging.info(f"JSON record written to {self.json_file}")
        return self.json_file

    def write_output(self, text: str):
        """Append console text to the transcript."""
        with open(self.text_log_file, 'a') as f:
            f.write(text + '\n')

    def close(self):
        """Save the JSON record if the run ended early and detach the handler."""
        if not self._saved:
            self.save_json()
        root = logging.getLogger()
        if self._handler in root.handlers:
            root.removeHandler(self._handler)
        self._handler.close()

"""CSV and file helpers for experiment artifacts"""
import csv
import io
import logging
import os
import tempfile
from datetime import datetime

logger = logging.getLogger(__name__)

COMMENT_PREFIX = "#"


def format_value(value):
    """Exact text for floats so reruns give byte-identical bodies"""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))
    if hasattr(value, "item"):
        return format_value(value.item())
    return str(value)


def atomic_write_text(path, text):
    """Write text to a temporary file in the target directory and move it into place"""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp_", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp_path, path)
    except Exception:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    logger.debug(f"Wrote {path}")
    return path


def render_csv(header, rows, stamp=True):
    """CSV text with an optional `# generated ...` comment line ahead of the header"""
    buffer = io.StringIO()
    if stamp:
        buffer.write(f"{COMMENT_PREFIX} generated {datetime.now().isoformat(timespec='seconds')}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buffer.getvalue()


def write_csv(path, header, rows, stamp=True):
    return atomic_write_text(path, render_csv(header, rows, stamp=stamp))


def read_csv(path):
    """Return (header, rows) skipping comment lines; values stay strings"""
    with open(path, "r", newline="") as f:
        lines = [line for line in f if not line.startswith(COMMENT_PREFIX)]
    reader = csv.reader(lines)
    header = next(reader)
    rows = [row for row in reader if row]
    return header, rows


def csv_body(path):
    """File contents without comment lines"""
    with open(path, "r") as f:
        return "".join(line for line in f if not line.startswith(COMMENT_PREFIX))

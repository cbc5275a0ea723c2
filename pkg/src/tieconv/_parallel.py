import os


def workers():
    """Worker count for k-d tree queries, from ``TIECONV_THREADS`` (0 = auto)."""
    raw = os.environ.get("TIECONV_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        return 1
    return -1 if n <= 0 else n

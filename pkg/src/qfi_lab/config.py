"""Process-level settings read from the environment."""
import os


def max_threads():
    """Upper bound on worker threads, from QFI_LAB_THREADS (default: CPU count, at most 8)."""
    raw = os.environ.get("QFI_LAB_THREADS")
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"QFI_LAB_THREADS must be a positive integer, got {raw!r}") from None
        if n < 1:
            raise ValueError(f"QFI_LAB_THREADS must be a positive integer, got {raw!r}")
        return n
    return max(1, min(8, os.cpu_count() or 1))

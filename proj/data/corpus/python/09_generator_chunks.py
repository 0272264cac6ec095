def chunks(seq, size):
    """Yield successive slices of length size."""
    for start in range(0, len(seq), size):
        yield seq[start:start + size]

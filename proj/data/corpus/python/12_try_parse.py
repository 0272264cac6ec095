def parse_or(raw, fallback=0):
    try:
        return int(raw.strip())
    except (ValueError, AttributeError):
        return fallback

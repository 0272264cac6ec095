from pathlib import Path


def read_lines(path):
    with open(path, encoding="utf-8") as handle:
        return [line.rstrip("\n") for line in handle]


def count_nonempty(path):
    return sum(1 for line in read_lines(Path(path)) if line.strip())

def reverse(text: str) -> str:
    return text[::-1]

from collections import Counter


def word_count(text):
    # lower-cased, whitespace separated
    return Counter(word.lower() for word in text.split())

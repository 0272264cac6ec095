def sort_by_length(words, reverse=False):
    return sorted(words, key=lambda w: (len(w), w), reverse=reverse)

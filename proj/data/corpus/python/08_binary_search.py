def binary_search(items, key):
    lo, hi = 0, len(items) - 1
    while lo <= hi:
        mid = (lo + hi) // 2
        if items[mid] < key:
            lo = mid + 1
        elif items[mid] > key:
            hi = mid - 1
        else:
            return mid
    return -1

static int binarySearch(int[] sorted, int key) {
    int lo = 0, hi = sorted.length - 1;
    while (lo <= hi) {
        int mid = (lo + hi) >>> 1;
        if (sorted[mid] < key) lo = mid + 1;
        else if (sorted[mid] > key) hi = mid - 1;
        else return mid;
    }
    return -(lo + 1);
}

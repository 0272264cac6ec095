func binarySearch(items []int, key int) int {
	lo, hi := 0, len(items)-1
	for lo <= hi {
		mid := (lo + hi) / 2
		switch {
		case items[mid] < key:
			lo = mid + 1
		case items[mid] > key:
			hi = mid - 1
		default:
			return mid
		}
	}
	return -1
}

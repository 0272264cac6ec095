function binarySearch(items, key) {
  let lo = 0;
  let hi = items.length - 1;
  while (lo <= hi) {
    const mid = (lo + hi) >> 1;
    if (items[mid] < key) lo = mid + 1;
    else if (items[mid] > key) hi = mid - 1;
    else return mid;
  }
  return -1;
}

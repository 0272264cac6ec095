func parallelSum(parts [][]int) int {
	results := make(chan int, len(parts))
	for _, p := range parts {
		go func(xs []int) {
			s := 0
			for _, x := range xs {
				s += x
			}
			results <- s
		}(p)
	}
	total := 0
	for range parts {
		total += <-results
	}
	return total
}

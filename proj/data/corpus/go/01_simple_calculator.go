package calc

type SimpleCalculator struct {
	total int
}

func (c *SimpleCalculator) Add(value int) int {
	c.total += value
	return c.total
}

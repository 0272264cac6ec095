class SimpleCalculator {
  constructor() {
    this.total = 0;
  }

  add(value) {
    this.total += value;
    return this.total;
  }
}

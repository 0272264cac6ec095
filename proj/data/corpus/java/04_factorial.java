long factorial(int n) {
    if (n <= 1) {
        return 1L;
    }
    return n * factorial(n - 1);
}

public class SimpleCalculator {
    private int total;

    public int add(int value) {
        total += value;
        return total;
    }
}

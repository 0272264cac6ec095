record Point(int x, int y) {
    double distanceTo(Point other) {
        int dx = x - other.x();
        int dy = y - other.y();
        return Math.sqrt(dx * dx + dy * dy);
    }
}

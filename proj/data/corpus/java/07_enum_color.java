enum Color {
    RED, GREEN, BLUE;

    Color next() {
        return values()[(ordinal() + 1) % values().length];
    }
}

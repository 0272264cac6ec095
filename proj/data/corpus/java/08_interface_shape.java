interface Shape {
    double area();

    default String describe() {
        return getClass().getSimpleName() + " with area " + area();
    }
}

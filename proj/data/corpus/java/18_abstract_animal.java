abstract class Animal {
    protected final String name;

    Animal(String name) {
        this.name = name;
    }

    abstract String sound();

    @Override
    public String toString() {
        return name + " says " + sound();
    }
}

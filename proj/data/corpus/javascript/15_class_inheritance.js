class Animal {
  constructor(name) {
    this.name = name;
  }

  toString() {
    return `${this.name} says ${this.sound()}`;
  }
}

class Dog extends Animal {
  sound() {
    return 'woof';
  }
}

class Emitter {
  constructor() {
    this.handlers = {};
  }

  on(event, handler) {
    (this.handlers[event] ||= []).push(handler);
  }

  emit(event, ...args) {
    (this.handlers[event] || []).forEach((h) => h(...args));
  }
}

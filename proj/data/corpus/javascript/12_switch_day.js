function dayKind(day) {
  switch (day) {
    case 6:
    case 7:
      return 'weekend';
    default:
      return 'weekday';
  }
}

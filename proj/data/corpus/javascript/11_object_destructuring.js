function describe({ name, age = 0, ...rest }) {
  const extra = Object.keys(rest).length;
  return `${name} (${age}) +${extra}`;
}

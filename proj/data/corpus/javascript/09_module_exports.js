const path = require('path');

function resolveAll(base, names) {
  return names.map((name) => path.join(base, name));
}

module.exports = { resolveAll };

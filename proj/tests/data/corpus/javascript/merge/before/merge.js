function merge(target, source) {
  for (const key of Object.keys(source)) {
    if (typeof source[key] === 'object') {
      target[key] = merge(target[key] || {}, source[key]);
    } else {
      target[key] = source[key];
    }
  }
  return target;
}

class Config {
  constructor(defaults) {
    this.values = merge({}, defaults);
  }

  update(patch) {
    merge(this.values, patch);
  }
}

module.exports = { merge, Config };

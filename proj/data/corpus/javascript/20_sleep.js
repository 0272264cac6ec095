/* resolves after ms milliseconds */
const sleep = (ms) => new Promise((resolve) => setTimeout(resolve, ms));

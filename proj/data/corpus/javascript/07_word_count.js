// counts lower-cased words
function wordCount(text) {
  const counts = new Map();
  for (const word of text.toLowerCase().split(/\s+/)) {
    if (!word) continue;
    counts.set(word, (counts.get(word) || 0) + 1);
  }
  return counts;
}

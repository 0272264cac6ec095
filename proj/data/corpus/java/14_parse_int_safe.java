static int parseOr(String raw, int fallback) {
    try {
        return Integer.parseInt(raw.trim());
    } catch (NumberFormatException e) {
        return fallback;
    }
}

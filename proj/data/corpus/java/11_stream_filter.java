List<String> longNames(List<String> names, int minLength) {
    return names.stream()
        .filter(n -> n.length() >= minLength)
        .sorted()
        .collect(Collectors.toList());
}

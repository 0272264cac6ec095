public static String reverse(String text) {
    return new StringBuilder(text).reverse().toString();
}

import java.util.HashMap;
import java.util.Map;

class WordCount {
    // counts words separated by whitespace
    static Map<String, Integer> count(String text) {
        Map<String, Integer> counts = new HashMap<>();
        for (String word : text.split("\\s+")) {
            counts.merge(word.toLowerCase(), 1, Integer::sum);
        }
        return counts;
    }
}

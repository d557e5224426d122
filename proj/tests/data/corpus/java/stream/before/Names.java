package app.util;

import java.util.List;
import java.util.stream.Collectors;

public final class Names {
    private Names() {}

    public static List<String> visible(List<String> names, int max) {
        return names.stream()
                .filter(n -> n.length() < max + 1)
                .collect(Collectors.toList());
    }

    public static String first(List<String> names) {
        return names.get(0);
    }
}

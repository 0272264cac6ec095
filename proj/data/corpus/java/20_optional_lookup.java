Optional<User> findUser(Map<Long, User> users, long id) {
    /* absent ids map to empty */
    return Optional.ofNullable(users.get(id));
}

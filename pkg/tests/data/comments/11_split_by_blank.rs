// one

// two

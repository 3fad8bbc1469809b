x = 1  # the answer
# block
# comment

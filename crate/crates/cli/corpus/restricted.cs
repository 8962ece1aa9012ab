# constructed: the order forbids the only solution
# expect: 0
knows: a . b
deduce: ?v
eq: ?v . b = a . b
order: ?v < a

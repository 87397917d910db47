def parse(tokens):
    values = []
    for tok in tokens:
        try:
            values.append(int(tok))
        except ValueError:
            try:
                values.append(float(tok))
            except ValueError:
                continue
        else:
            values[-1] *= 2
    return values


def main():
    data = input().split()
    nums = parse(data)
    assert len(nums) <= len(data), "parser produced extra values"
    total = sum(nums)
    print(total if nums else "empty")


main()

char c = '/'; char d = '*'; // slash star
